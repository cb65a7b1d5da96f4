from lib.shapes import *
from lib.colors import RED, blend
import lib.colors as colors

c = make_circle(2)
d = c
e = d.r
print(blend(RED, colors.RED))
