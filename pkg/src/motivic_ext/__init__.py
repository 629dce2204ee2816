"""Exact homological algebra over the mod-2 motivic Steenrod algebra over C.

Subpackage map:

- ``f2``       bit-packed GF(2) linear algebra
- ``taulin``   weight-graded F2[tau]-modules and their classification
- ``milnor``   Milnor-basis arithmetic in the motivic Steenrod algebra
- ``amodule``  finitely presented A-modules and the named presets
- ``margolis`` Sq1-Margolis homology and the A(0)-freeness criterion
- ``resolve``  minimal free resolutions (plus the twisted-cell variant)
- ``ext``      tri-graded Ext charts, h-products and verifiers
- ``chartio``  text/SVG rendering and golden chart comparison
- ``cli``      command-line front end
"""

__version__ = "0.1.0"
