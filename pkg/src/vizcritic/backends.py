"""Pluggable analysis backends and their wire contracts.

Every heavyweight model (saliency predictor, OCR engine, chart-to-table
reader, object detector, LLM) sits behind a small contract so external
services can substitute for the bundled deterministic defaults:

- saliency:       png bytes in  -> grayscale png of identical dimensions
- ocr:            png bytes in  -> one box per line: "x y w h confidence content"
- chart-to-table: png bytes in  -> title line (may be empty) + TSV table
- detector:       png bytes in  -> one detection per line: "label x y w h confidence"
- llm:            {system, prompt, temperature, max length} -> text

HTTP variants POST the request body to a configured URL.
"""
from __future__ import annotations

import io
from typing import Protocol

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter, uniform_filter

from .errors import BackendError


class SaliencyBackend(Protocol):
    backend_id: str

    def predict(self, png_bytes: bytes) -> bytes: ...


class OcrBackend(Protocol):
    backend_id: str

    def detect(self, png_bytes: bytes) -> str: ...


class ChartTableBackend(Protocol):
    backend_id: str

    def extract(self, png_bytes: bytes) -> str: ...


class DetectorBackend(Protocol):
    backend_id: str

    def detect(self, png_bytes: bytes) -> str: ...


class LlmBackend(Protocol):
    backend_id: str

    def complete(self, system: str, prompt: str, temperature: float, max_length: int) -> str: ...


# --------------------------------------------------------------------------
# Default saliency: classical spectral-residual, dependency-free and
# bitwise deterministic for a given image.
# --------------------------------------------------------------------------

_LUMA = np.array([0.299, 0.587, 0.114])


class SpectralResidualSaliency:
    """Spectral-residual saliency on the luma channel.

    The image is reduced to a small working width, the log-amplitude
    spectrum is compared against its local mean, and the inverse
    transform of the residual gives the saliency estimate, smoothed and
    upsampled back to the input size.
    """

    backend_id = "spectral-residual"

    def __init__(self, work_width: int = 64, smooth_sigma: float = 3.0):
        self.work_width = work_width
        self.smooth_sigma = smooth_sigma

    def predict(self, png_bytes: bytes) -> bytes:
        img = Image.open(io.BytesIO(png_bytes)).convert("RGB")
        w, h = img.size
        gray = np.asarray(img, dtype=np.float64) @ _LUMA

        ww = min(self.work_width, w)
        wh = max(8, int(round(h * ww / w)))
        small = Image.fromarray(gray.astype(np.float32), mode="F").resize((ww, wh), Image.BILINEAR)
        g = np.asarray(small, dtype=np.float64)

        spectrum = np.fft.fft2(g)
        amplitude = np.abs(spectrum)
        phase = np.angle(spectrum)
        log_amp = np.log(amplitude + 1e-12)
        residual = log_amp - uniform_filter(log_amp, size=3, mode="nearest")
        sal = np.abs(np.fft.ifft2(np.exp(residual + 1j * phase))) ** 2
        sal = gaussian_filter(sal, sigma=self.smooth_sigma, mode="nearest")

        up = Image.fromarray(sal.astype(np.float32), mode="F").resize((w, h), Image.BILINEAR)
        sal = np.asarray(up, dtype=np.float64)
        peak = sal.max()
        if peak > 0:
            sal = sal / peak
        out = Image.fromarray(np.clip(np.rint(sal * 255.0), 0, 255).astype(np.uint8), mode="L")
        buf = io.BytesIO()
        out.save(buf, format="PNG")
        return buf.getvalue()


# --------------------------------------------------------------------------
# Deterministic stubs (test fixtures and offline defaults)
# --------------------------------------------------------------------------


class UniformSaliencyStub:
    """Returns a constant mid-gray map; normalizes to all-ones downstream."""

    backend_id = "stub-uniform-saliency"

    def predict(self, png_bytes: bytes) -> bytes:
        img = Image.open(io.BytesIO(png_bytes))
        out = Image.new("L", img.size, 128)
        buf = io.BytesIO()
        out.save(buf, format="PNG")
        return buf.getvalue()


class StubOcr:
    """Serves canned box lines regardless of input."""

    backend_id = "stub-ocr"

    def __init__(self, lines: list[str] | None = None):
        self.lines = list(lines or [])

    def detect(self, png_bytes: bytes) -> str:
        return "\n".join(self.lines)


class NullOcr:
    """Reports no text; the offline default when no OCR service is configured."""

    backend_id = "null-ocr"

    def detect(self, png_bytes: bytes) -> str:
        return ""


class StubChartTable:
    """Serves a canned title + TSV response."""

    backend_id = "stub-chart-table"

    def __init__(self, response: str = ""):
        self.response = response

    def extract(self, png_bytes: bytes) -> str:
        return self.response


class NullChartTable:
    """Always reports the chart as unparseable."""

    backend_id = "null-chart-table"

    def extract(self, png_bytes: bytes) -> str:
        return ""


class StubDetector:
    backend_id = "stub-detector"

    def __init__(self, lines: list[str] | None = None):
        self.lines = list(lines or [])

    def detect(self, png_bytes: bytes) -> str:
        return "\n".join(self.lines)


class NullDetector:
    backend_id = "null-detector"

    def detect(self, png_bytes: bytes) -> str:
        return ""


class TemplateLlm:
    """Deterministic offline text generator.

    Produces a short sentence derived from the prompt so reports remain
    readable without any network access.
    """

    backend_id = "offline-template-llm"

    def complete(self, system: str, prompt: str, temperature: float, max_length: int) -> str:
        head = " ".join(prompt.split()[:24])
        text = f"(offline feedback) {head}"
        return text[:max_length]


class EchoLlm:
    """Echoes the first n words of the prompt; handy in tests."""

    backend_id = "stub-echo-llm"

    def __init__(self, words: int = 10):
        self.words = words

    def complete(self, system: str, prompt: str, temperature: float, max_length: int) -> str:
        return " ".join(prompt.split()[: self.words])[:max_length]


class PoisonLlm:
    """Fails on any call; proves that replay mode never touches the network."""

    backend_id = "poison-llm"

    def complete(self, system: str, prompt: str, temperature: float, max_length: int) -> str:
        raise BackendError("llm backend must not be called in this mode")


class FailingOcr:
    backend_id = "failing-ocr"

    def detect(self, png_bytes: bytes) -> str:
        raise BackendError("ocr backend unreachable")


# --------------------------------------------------------------------------
# HTTP adapters
# --------------------------------------------------------------------------


def _post_bytes(url: str, payload: bytes, content_type: str) -> bytes:
    import httpx

    try:
        resp = httpx.post(url, content=payload, headers={"Content-Type": content_type}, timeout=60.0)
    except httpx.HTTPError as exc:
        raise BackendError(f"backend {url} unreachable: {exc}") from None
    if resp.status_code != 200:
        retry = resp.headers.get("Retry-After")
        raise BackendError(
            f"backend {url} returned {resp.status_code}",
            retry_after=float(retry) if retry else None,
        )
    return resp.content


class HttpSaliency:
    def __init__(self, url: str):
        self.url = url
        self.backend_id = f"http-saliency:{url}"

    def predict(self, png_bytes: bytes) -> bytes:
        return _post_bytes(self.url, png_bytes, "image/png")


class HttpOcr:
    def __init__(self, url: str):
        self.url = url
        self.backend_id = f"http-ocr:{url}"

    def detect(self, png_bytes: bytes) -> str:
        return _post_bytes(self.url, png_bytes, "image/png").decode("utf-8")


class HttpChartTable:
    def __init__(self, url: str):
        self.url = url
        self.backend_id = f"http-chart-table:{url}"

    def extract(self, png_bytes: bytes) -> str:
        return _post_bytes(self.url, png_bytes, "image/png").decode("utf-8")


class HttpDetector:
    def __init__(self, url: str):
        self.url = url
        self.backend_id = f"http-detector:{url}"

    def detect(self, png_bytes: bytes) -> str:
        return _post_bytes(self.url, png_bytes, "image/png").decode("utf-8")


class HttpLlm:
    def __init__(self, url: str):
        self.url = url
        self.backend_id = f"http-llm:{url}"

    def complete(self, system: str, prompt: str, temperature: float, max_length: int) -> str:
        import json

        body = json.dumps(
            {"system": system, "prompt": prompt, "temperature": temperature, "max_length": max_length}
        ).encode("utf-8")
        return _post_bytes(self.url, body, "application/json").decode("utf-8")
