from .config import *
from .io import *
from .manifest import *
