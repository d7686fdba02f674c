# Data sources
