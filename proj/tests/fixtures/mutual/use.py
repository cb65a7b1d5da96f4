from a import ALPHA, Klass
from b import BETA

# the cursor sits on a comment
k = Klass()
v = k.nonexistent
