"""Write a noisy WAV, enhance it, and look at the spectrum before and after.

Run: python3 demos/wav_roundtrip.py [output-dir]
"""
import sys
import tempfile
from pathlib import Path

import numpy as np

from kapa import KernelFilterConfig, TestbedSpec, mix_at_snr, read_wav, run_kernel, synth_testbed, write_wav
from kapa.metrics import output_snr_db, spectrogram_csv

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
clean, noise = synth_testbed(TestbedSpec(length=8000, seed=3))
noisy, scale = mix_at_snr(clean, noise, 5.0)
write_wav(out / "noisy.wav", noisy)
write_wav(out / "clean.wav", clean)

# files come back quantized to 16 bits
noisy_in = read_wav(out / "noisy.wav")
print(f"16-bit quantization error {np.max(np.abs(noisy_in.samples - noisy.samples)):.1e}")

run = run_kernel(KernelFilterConfig(algorithm="kapa"), noisy_in, read_wav(out / "clean.wav"))
enhanced = clean.with_samples(run.y)
write_wav(out / "enhanced.wav", enhanced)
print(f"SNR {output_snr_db(clean, noisy_in):.2f} dB -> {output_snr_db(clean, enhanced):.2f} dB")

freqs = np.fft.rfftfreq(256, 1 / clean.sample_rate_hz)
before = spectrogram_csv(noisy_in).mean(axis=0)
after = spectrogram_csv(enhanced).mean(axis=0)
for f0 in (250, 625, 1375, 3000):
    b = int(np.argmin(np.abs(freqs - f0)))
    print(f"{freqs[b]:6.0f} Hz  noisy {10 * np.log10(before[b]):6.1f} dB   enhanced {10 * np.log10(after[b]):6.1f} dB")
print(f"wrote {out}")
