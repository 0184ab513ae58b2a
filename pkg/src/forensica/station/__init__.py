"""Station catastrophe game: construction and simulation."""
