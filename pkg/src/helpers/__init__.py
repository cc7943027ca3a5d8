# Empty file to make helpers a Python package