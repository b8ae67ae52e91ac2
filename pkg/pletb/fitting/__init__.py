from .config import *
from .result import *
from .voigt import *
