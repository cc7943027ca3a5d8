# Empty file to make mission a Python package