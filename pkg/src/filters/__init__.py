# Linear filters and state-space models
