"""Stake tug-of-war on integer trails.

Two players repeatedly stake money on a biased coin that moves a counter
along a line of integers; stakes are sunk each turn and the terminal
payments depend on which end the counter leaves through.  This package
constructs the explicit equilibrium solutions of that game, evaluates and
inverts its margin maps, certifies the key numerical bounds in exact
arithmetic, simulates play, runs the time-dependent backward induction,
and serves an interactive version over HTTP.
"""

__version__ = "0.1.0"
