from .params import *
from .functional import *
