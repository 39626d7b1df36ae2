import numpy as np

# Doctests were written against the NumPy 1.x scalar repr (e.g. `0.01`, not `np.float64(0.01)`).
try:
    np.set_printoptions(legacy="1.25")
except (TypeError, ValueError):
    pass
