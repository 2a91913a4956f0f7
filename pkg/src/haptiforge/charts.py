"""Deterministic SVG strip chart for waveform traces (no plotting deps)."""

from __future__ import annotations

from .stimulator import N_CHANNELS, WaveformTrace

ROW_H = 28
PAD = 40
PLOT_W = 900


def waveform_strip_svg(trace: WaveformTrace, max_points: int = 4000) -> bytes:
    """One row per channel, time left to right, current as a step trace."""
    n = trace.n_ticks
    stride = max(1, n // max_points)
    height = PAD + N_CHANNELS * ROW_H + PAD // 2
    width = PLOT_W + 2 * PAD
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{PAD}" y="20" font-size="12" font-family="monospace">'
        f'{trace.duration_us:g} us at dt={trace.dt_us:g} us</text>',
    ]
    amp_max = max([a for a in trace.amplitudes.values()] + [1.0])
    for ch in range(N_CHANNELS):
        y0 = PAD + ch * ROW_H + ROW_H - 6
        samples = trace.channel_samples(ch)[::stride]
        pts = []
        for k, v in enumerate(samples):
            x = PAD + (k * stride) / max(1, n - 1) * PLOT_W
            y = y0 - (v / amp_max) * (ROW_H - 10)
            pts.append(f"{x:.1f},{y:.1f}")
        parts.append(
            f'<text x="4" y="{y0}" font-size="10" font-family="monospace">ch{ch}</text>')
        parts.append(
            f'<polyline fill="none" stroke="black" stroke-width="1" '
            f'points="{" ".join(pts)}"/>')
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode()
