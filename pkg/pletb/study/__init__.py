from .spec import *
from .sweeps import *
