"""Identification, validity repair, asymptotics and model-error bounds"""
