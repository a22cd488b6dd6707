# Structured logging helpers; used alongside the standard library logging module
