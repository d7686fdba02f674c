# Kalman trend toolkit
