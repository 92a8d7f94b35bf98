"""QAM-OFDM co-channel interference cancellation toolkit."""

import os


def _load_core():
    # In-tree test runs point DIC_CORE_DIR at the CMake build output; installed
    # wheels carry _core next to this file.
    core_dir = os.environ.get("DIC_CORE_DIR")
    if core_dir:
        import importlib.util
        import sysconfig

        suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
        path = os.path.join(core_dir, "_core" + suffix)
        spec = importlib.util.spec_from_file_location("dicancel._core", path)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
        return module
    from . import _core

    return _core


_core = _load_core()

BLOCK_LEN = _core.BLOCK_LEN
Canceller = _core.Canceller
Constellation = _core.Constellation
calibrate_sir = _core.calibrate_sir
evaluate = _core.evaluate
generate_dataset = _core.generate_dataset
latency_estimate = _core.latency_estimate
quant_sweep = _core.quant_sweep
train = _core.train

__version__ = _core.__version__
__all__ = [
    "BLOCK_LEN",
    "Canceller",
    "Constellation",
    "calibrate_sir",
    "evaluate",
    "generate_dataset",
    "latency_estimate",
    "quant_sweep",
    "train",
]
