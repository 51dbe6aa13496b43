"""Vertex-reinforced non-backtracking random walks and their mean-field analysis.

Subpackages:

* ``measures``   -- probability measures, the constrained simplex, exact projection
* ``kernels``    -- edge kernels, stationary measures, pseudo-inverse, corner limits
* ``walk``       -- walk simulation, path formation, localization Monte Carlo
* ``flow``       -- mean-field vector field, flow integration, Lyapunov function
* ``equilibria`` -- equilibrium enumeration and stability classification
* ``cli``        -- experiment driver with CSV/JSON reports
"""

__version__ = "0.1.0"
