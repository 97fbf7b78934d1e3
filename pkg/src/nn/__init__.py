"""Dense networks, Gaussian heads and the Adam optimizer."""
