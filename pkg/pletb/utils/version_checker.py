from functools import wraps
from importlib.metadata import version as _installed_version

from packaging import version

from pletb.exceptions import DependencyVersionError


def installed_version(package):
    return version.parse(_installed_version(package))


def minimum_required_version(package, version_str):
    def minimum_required_version_wrapper(func):
        @wraps(func)
        def func_with_version_checking(*args, **kwargs):
            current = installed_version(package)
            if current < version.parse(version_str):
                raise DependencyVersionError(
                    f"{func.__name__} requires {package} >= {version_str}, but {current} is installed"
                )
            return func(*args, **kwargs)

        return func_with_version_checking

    return minimum_required_version_wrapper


def assert_version_greater_equal(package, version_str):
    current = installed_version(package)
    if current < version.parse(version_str):
        raise DependencyVersionError(f"PLE Toolbox requires {package} >= {version_str}, but {current} is installed")
