# Empty file to make collocation a Python package