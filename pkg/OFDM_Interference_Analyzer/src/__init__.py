# OFDM Interference Analyzer - exact ISI/ICI SINR and rate analysis
