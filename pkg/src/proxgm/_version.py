# generated by setup.py, do not edit
__version__ = '0+unknown'
