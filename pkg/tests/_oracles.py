"""Closed-form reference values shared by several test modules."""

import math

import numpy as np


def gaussian_density(r2, var, d):
    return (2 * math.pi * var) ** (-d / 2) * np.exp(-r2 / (2 * var))
