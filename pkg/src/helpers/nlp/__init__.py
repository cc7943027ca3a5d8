# Empty file to make nlp a Python package