import struct
import wave

import numpy as np
import pytest

ACCEPTANCE_RESULTS = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def wav_factory(tmp_path):
    """Write raw integer frames to a WAV file with the given layout."""

    def make(name, frames, width=2, channels=1, rate=8000):
        path = tmp_path / name
        with wave.open(str(path), "wb") as w:
            w.setnchannels(channels)
            w.setsampwidth(width)
            w.setframerate(rate)
            if width == 1:
                w.writeframes(bytes(np.asarray(frames, dtype=np.uint8)))
            else:
                w.writeframes(np.asarray(frames, dtype="<i2").tobytes())
        return path

    return make


@pytest.fixture
def float_wav(tmp_path):
    """A 32-bit IEEE-float WAV (format code 3), which the reader must reject."""
    path = tmp_path / "float.wav"
    data = struct.pack("<2f", 0.25, -0.5)
    fmt = struct.pack("<HHIIHH", 3, 1, 8000, 32000, 4, 32)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(data)) + data
    path.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    return path


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
