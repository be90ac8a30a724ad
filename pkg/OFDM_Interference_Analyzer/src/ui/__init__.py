# Terminal rendering and result writers
