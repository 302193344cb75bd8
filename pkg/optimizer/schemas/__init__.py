"""Domain schemas for markets, games, correlated profiles and simulation."""
