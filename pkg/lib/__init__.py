# Mixture Kinetics Library
