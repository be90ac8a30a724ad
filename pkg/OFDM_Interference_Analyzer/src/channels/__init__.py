# Channel impulse responses: CIR files, truncation and synthetic generators
