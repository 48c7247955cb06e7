"""Stylized motion in-betweening.

Pipeline: a periodic autoencoder extracts phase, a variational mixture of
experts learns a motion manifold, and a style-conditioned recurrent sampler
walks the manifold from a start frame to a target frame.
"""

__version__ = "0.1.0"
