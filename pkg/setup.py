from setuptools import setup, find_packages
from codecs import open
from os import path

__version__ = '0.1.0'

here = path.abspath(path.dirname(__file__))

# Get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

# get the dependencies and installs
with open(path.join(here, 'requirements.txt'), encoding='utf-8') as f:
    all_reqs = f.read().split('\n')

install_requires = [x.strip() for x in all_reqs if x.strip() and not x.startswith('#') and 'git+' not in x]
dependency_links = [x.strip().replace('git+', '') for x in all_reqs if x.startswith('git+')]

setup(
    name='crn-jaspa',
    version=__version__,
    description='Joint AP selection and power allocation in cognitive radio networks.',
    long_description=long_description,
    license='BSD',
    classifiers=[
      'Development Status :: 3 - Alpha',
      'Intended Audience :: Science/Research',
      'Programming Language :: Python :: 3',
    ],
    keywords='cognitive radio, game theory, water-filling',
    packages=find_packages(exclude=['docs', 'tests*', 'examples*']),
    py_modules=['crn'],
    package_data={'harness': ['config.ini', 'logging.yaml']},
    include_package_data=True,
    install_requires=install_requires,
    dependency_links=dependency_links,
)
