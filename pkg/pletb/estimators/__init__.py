from .samples import *
from .classical import *
from .histogram import *
