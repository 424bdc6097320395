"""
holoflow test suite

Unit tests run by default; tract growth and family window runs need --runslow.
"""
