"""Test suite for the diffusion segmentation engine"""
