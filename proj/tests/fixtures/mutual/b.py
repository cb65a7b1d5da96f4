from a import ALPHA
from a.ghost import Thing

BETA = ALPHA
