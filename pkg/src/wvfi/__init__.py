"""Two-stage video frame interpolation in the Haar wavelet domain with
threshold-controlled sparse coefficient decoding."""

__version__ = "0.1.0"
