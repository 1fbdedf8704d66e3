"""Cyclic-distributed multidimensional FFT with one all-to-all exchange."""

from ._core import (
    FftuConfigError,
    FftuFormatError,
    __version__,
    dft_naive,
    fft,
    fft_with_trace,
    four_step,
    generate_input,
    max_processors,
    read_signal,
    write_signal,
)

__all__ = [
    "FftuConfigError",
    "FftuFormatError",
    "__version__",
    "dft_naive",
    "fft",
    "fft_with_trace",
    "four_step",
    "generate_input",
    "max_processors",
    "read_signal",
    "write_signal",
]
