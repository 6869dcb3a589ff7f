"""Configuration, file formats, paths and logging"""
