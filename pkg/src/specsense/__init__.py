"""specsense: synthetic spectrum captures and a from-scratch CNN classifier.

The package covers the full experiment loop for wireless signal
classification at the sample level:

    >>> from specsense import dataset, transforms, nnet
    >>> ds = dataset.generate_dataset(dataset.Task.MODULATION, 2, [0, 10], seed=7)
    >>> feats = transforms.feature_matrix(ds.captures(), transforms.Repr.IQ)

Datasets are generated from seeded signal models (sigsynth), pushed through
a configurable impairment chain (channel), framed into fixed-length complex
captures (dataset), mapped to 2xN real feature planes (transforms), and
classified by a small convolutional network trained end to end (nnet).
Reports and figures come from eval; the command line front end lives in cli.
"""

import os

# Cap BLAS worker pools before numpy is first imported anywhere in the
# package, otherwise the setting has no effect.
_threads = os.environ.get("SPECSENSE_THREADS", "").strip()
if _threads.isdigit() and int(_threads) > 0:
    for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)
del os, _threads

__version__ = "0.1.0"

__all__ = [
    "sigsynth",
    "channel",
    "dataset",
    "transforms",
    "nnet",
    "eval",
    "cli",
    "__version__",
]
