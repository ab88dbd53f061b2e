"""Python access to the gelscan band-detection core.

Images are 2-D float arrays indexed [row, column]. Pipeline options are
passed as keyword arguments using the configuration key names, e.g.
``analyze(img, enhance=True, alpha_override=0.15)``.
"""

import json

from ._gelscan import (
    GelscanError,
    Image,
    apply_threshold,
    bottom_hat,
    close,
    decode_image,
    dilate,
    enhance,
    erode,
    load_image,
    median_filter,
    open,
    ratio_size,
    std_profile,
    top_hat,
)
from . import _gelscan

__all__ = [
    "GelscanError", "Image", "analyze", "apply_threshold", "bottom_hat", "close",
    "decode_image", "dilate", "enhance", "erode", "load_image", "median_filter",
    "open", "ratio_size", "report", "std_profile", "synth", "top_hat",
]


def analyze(image, **config):
    """Run the pipeline. Returns a dict with config, decision, bands and
    stages (name -> array)."""
    summary, stages = _gelscan._analyze(image, json.dumps(config))
    result = json.loads(summary)
    result["stages"] = stages
    return result


def report(path, reference=None, **config):
    """The report document the CLI would write for ``path``, as a dict."""
    return json.loads(_gelscan._report_for_file(str(path), json.dumps(config), reference))


def synth(seed, preset="clean"):
    """Synthetic gel: (Image, ground-truth dict)."""
    image, truth = _gelscan._synth(preset, seed)
    return image, json.loads(truth)
