"""Workbench for P-stability data: curves, elliptic Fourier-Mukai and the P1 x E surface."""
