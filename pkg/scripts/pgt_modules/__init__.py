# PGT Modules Package
