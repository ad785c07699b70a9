# Puts the repository root on sys.path so `import pstab` works under pytest.
