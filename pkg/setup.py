import os
import re

from setuptools import setup


def risknet_version() -> str:
    with open(os.path.join('risknet/__init__.py')) as f:
        return re.search("__version__ = ['\"]([^'\"]+)['\"]", f.read()).group(1)


VERSION = risknet_version()
DESCRIPTION = open('README.md').read()

EXTRAS_REQUIRE = {
    'test': [
        'networkx>=3.1',
        'pytest>=7.3.1',
    ]
}

setup(
    name='risknet',
    version=VERSION,
    python_requires='>=3.11',
    description='Copula-DCC-GARCH correlation networks, minimum spanning trees and their topology over time',
    long_description=DESCRIPTION,
    long_description_content_type='text/markdown',
    include_package_data=True,
    license='MIT',
    classifiers=[
        'Operating System :: OS Independent',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3.11',
    ],
    entry_points={
        'console_scripts': ['risknet=risknet.cli.main:start'],
    },
    packages=['risknet', 'risknet.cli'],
    install_requires=[
        'matplotlib>=3.7.1',
        'numpy>=1.24.3',
        'orjson>=3.8.10',
        'pandas>=2.0.1',
        'pydantic>=1.10.7,<2',
        'rich>=13.3.2',
        'scipy>=1.10.1',
        'statsmodels>=0.14.0',
    ],
    extras_require=EXTRAS_REQUIRE,
)
