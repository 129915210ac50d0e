"""BQR Utilities"""
