# Settings and run-file schema
