# Empty file to make commands a Python package