'''
Simulation library for joint AP selection and power allocation in multi-AP
cognitive radio networks.
'''
