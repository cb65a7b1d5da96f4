from units import convert
from square import Square
from base import Base

shape = Square(2)
shape.
