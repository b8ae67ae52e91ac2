from ..estimators.histogram import BinningScheme
from .settings import *
from .simulation import *
from .chi2 import *
from .grid import *
