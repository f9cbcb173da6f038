# Parity layout of a 5-spin all-to-all problem: one physical qubit per
# logical pair, one constraint per plaquette.
import itertools

import numpy as np

from lhzanneal import build_layout, decode, encode
from lhzanneal.lattice import count_satisfying_configs

layout = build_layout(5)
print("physical qubits K =", layout.K, " constraints L =", layout.L)
for k, pair in enumerate(layout.pairs):
    print(f"  qubit {k}: logical pair {pair}")
for l, members in enumerate(layout.plaquettes):
    print(f"  plaquette {l}: qubits {members}")

# every logical configuration maps to a constraint-satisfying physical one
x = np.array([1, -1, -1, 1, 1])
z = encode(layout, x)
print("\nlogical", x, "-> physical", z)
print("decoded back:", decode(layout, z).logical)

# a single flipped qubit breaks exactly the plaquettes it sits on
z[3] *= -1
res = decode(layout, z)
print("after flipping qubit 3, violated plaquettes:", res.violated)

images = {tuple(encode(layout, x)) for x in itertools.product((1, -1), repeat=5)}
print("\ndistinct images of encode:", len(images))
print("satisfying physical configurations:", count_satisfying_configs(layout))
