"""Narrative tour of the feathered center/surround kernels.

Prints the default 4x4 center and 8x8 surround weight grids, then computes
the largest center-minus-surround score any binary input can produce. With
both kernels normalized to sum to one, that ceiling sits well below 1.0,
which is why thresholds must be chosen inside the achievable range.

Run:  python3 demos/kernel_gallery.py
"""

import numpy as np

from oms import kernel_to_text, make_feathered_kernel

center = make_feathered_kernel(radius=2, sigma=1.0)
surround = make_feathered_kernel(radius=4, sigma=2.0)

print("center kernel (radius 2, sigma 1):")
print(kernel_to_text(center))
print("\nsurround kernel (radius 4, sigma 2):")
print(kernel_to_text(surround))

# Embed the 4x4 center in the 8x8 surround support and look at the signed
# difference. Activating exactly the cells where center > surround maximizes
# the score |fil_c - fil_s|; that sum is the hard ceiling.
diff = -surround.weights.copy()
diff[2:6, 2:6] += center.weights
ceiling = np.maximum(diff, 0.0).sum()

print(f"\nweight count: {center.weights.size} + {surround.weights.size} = "
      f"{center.weights.size + surround.weights.size}")
print(f"max achievable |center - surround| score: {ceiling:.4f}")
print("=> any spike threshold above that value can never fire")
