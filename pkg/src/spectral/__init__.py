"""Case normal modes and the transfer problem at the origin."""
