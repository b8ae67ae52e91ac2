from pletb.utils.version_checker import assert_version_greater_equal

__version__ = "0.1.0-alpha.1"

assert_version_greater_equal("numpy", "1.20")
assert_version_greater_equal("scipy", "1.7")
