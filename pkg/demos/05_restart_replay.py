"""
A receiver restarts mid-transfer
================================

The sender logs every object before sending it. A restarted receiver asks
for what it had begun over a lossless unicast path and ends up with the
same bytes as its untouched neighbour.
"""

import random

from layercast.netsim import LinkParams
from layercast.sender import SessionConfig
from layercast.session import MulticastSession

rng = random.Random(5)
payloads = [rng.randbytes(80_000), rng.randbytes(30_000), rng.randbytes(120_000)]
sess = MulticastSession(SessionConfig(channel_count=3), 2, seed=5,
                        link=LinkParams(0.07, 100))
for p in payloads:
    sess.submit(p)
sess.restart(1, at=150_000)
sess.run()

twin, victim = sess.receivers
print("restarts:", victim.restarts, " replays served:", sess.sender_app.replays_served)
for oid in sorted(twin.delivered):
    how = "replay" if victim.receiver.timing[oid].via_replay else "multicast"
    print(f"object {oid}: identical={twin.delivered[oid] == victim.delivered[oid]} "
          f"(victim got it by {how})")
