from .scan import *
from .sampling import *
from .statistics import *
