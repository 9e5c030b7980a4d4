# Spectral engines: grid, scattering data, transforms, evolution and analysis
