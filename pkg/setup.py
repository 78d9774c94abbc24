from setuptools import setup, find_packages

setup(name='curvlab',
      version='0.1.0',
      description='Inverse-linear variations and nonnegative curvature of left-invariant metrics on compact Lie groups',
      url='',
      author='',
      author_email='',
      packages=find_packages(exclude=['tests', 'examples', 'examples.*']),
      include_package_data=True,
      package_data={'curvlab': ['schema/*.json', 'scenarios/*/config.yaml']},
      zip_safe=False,
      python_requires='>=3.9',
      install_requires=['numpy', 'scipy', 'PyYAML', 'pandas', 'jsonschema'],
      extras_require={'test': ['pytest']},
      entry_points={'console_scripts': ['curvlab=curvlab.main:main']}
)
