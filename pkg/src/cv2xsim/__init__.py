"""Link-level C-V2X sidelink simulator.

Compares DMRS-based least-squares channel estimation against a trained
convolutional denoiser, scoring both by BLER, EVM, and channel-estimate
MSE across SNR and vehicle speed.
"""

__version__ = "0.1.0"
