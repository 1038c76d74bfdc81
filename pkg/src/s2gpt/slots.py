"""Canonical slot layout shared by all kernels.

A "slot" is the value of the field or one of its input partial derivatives
at a point. Every residual in the catalog is a function of these seven
slots, so linear combinations of network jets can be fed straight into it.
"""

SLOT_NAMES = ("u", "u_t", "u_tt", "u_x", "u_xx", "u_y", "u_yy")
N_SLOTS = len(SLOT_NAMES)

U, UT, UTT, UX, UXX, UY, UYY = range(N_SLOTS)

SLOT_INDEX = {name: i for i, name in enumerate(SLOT_NAMES)}

# slot name -> (jet stream, axis); axis is None for the value stream
SLOT_JET = {
    "u": ("value", None),
    "u_x": ("d1", 0),
    "u_xx": ("d2", 0),
    "u_t": ("d1", 1),
    "u_tt": ("d2", 1),
    "u_y": ("d1", 1),
    "u_yy": ("d2", 1),
}
