"""Hybrid super-wideband speech codec.

A 32 kHz codec built from a neural wideband coding path (16 kHz, 6 kbps
scalar-quantized embeddings), a QMF band split, an MDCT-domain high-band
envelope coder (2 kbps), and a long-term pitch postfilter. All perceptual
loss functions used to train the neural path are available as deterministic,
testable operations.

Subpackages by capability:

- :mod:`swbcodec.filterbank` -- two-channel QMF and multiband PQMF
- :mod:`swbcodec.transforms` -- STFT magnitudes, MDCT/IMDCT, ERB filterbank
- :mod:`swbcodec.net` -- deterministic forward graphs and the weight file format
- :mod:`swbcodec.wideband` -- scalar quantizer and the neural encode/decode path
- :mod:`swbcodec.bwe` -- MDCT-envelope bandwidth extension (8-16 kHz)
- :mod:`swbcodec.postfilter` -- pitch estimation and harmonic comb postfilter
- :mod:`swbcodec.bitstream` -- frame packing and the .pgna container
- :mod:`swbcodec.losses` -- MR-STFT, perceptual-magnitude, GAN and KD losses
- :mod:`swbcodec.pipeline` -- full encoder/decoder pipelines
- :mod:`swbcodec.cli` -- command line frontend
"""

__version__ = "0.1.0"
