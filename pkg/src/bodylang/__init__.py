"""Body-language social game platform.

A game server mediates social requests between friends: a requester asks for
a body-language performance in a specific visual style, a performer acts it
out in front of a public camera, and a recognition pipeline scores the match.
The package also ships a desk-scale field-study simulator and the statistical
analysis tools for its output.
"""

__version__ = "0.1.0"
