# flake8: noqa: F403, F405
from .config import *  # NOQA
from .utils import *  # NOQA
from .noise_model import *  # NOQA
from .source import *  # NOQA
from .galois import *  # NOQA
from .stattests import *  # NOQA
from .minentropy import *  # NOQA
from .extractors import *  # NOQA
from .pipeline import *  # NOQA
