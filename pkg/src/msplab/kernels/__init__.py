"""Low-level array kernels shared by the public API, bulk simulation and the
exact oracle.  Everything here works on flat numpy arrays only."""
