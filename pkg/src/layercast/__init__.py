"""Reliable layered multicast: erasure FEC, compression, carousel channels,
sender-side replay, and a deterministic network simulator to evaluate them."""

from .compressor import CompressionConfig, CompressionStats, compress, decompress
from .fec import SourceBlock, EncodedBlock, decode, encode, partition
from .netsim import LinkParams, Network, SimMetrics
from .receiver import AlcReceiver, ObjectComplete, Progress
from .sender import AlcSender, SessionConfig
from .session import MulticastSession
from .wire import LctPacket, ObjectTransmissionInfo, decode_packet, encode_packet

__version__ = "0.1.0"
