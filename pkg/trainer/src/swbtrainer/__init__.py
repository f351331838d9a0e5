"""Training harness for the hybrid super-wideband codec.

Pre-trains a deeper teacher codec, distills it into the lightweight
student with GAN knowledge distillation, and exports weights in the
shared PGWT format consumed by the inference library. Loss conventions
mirror the inference side and are cross-checked through golden files.
"""

__version__ = "0.1.0"
