import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="csicast",
    version="1.0",
    description="CSI prediction workbench: channel simulation, noise "
    "models, CSI-4CAST and baseline predictors, and benchmark evaluation",
    long_description=long_description,
    long_description_content_type="text/markdown",
    keywords=["python", "wireless", "mimo", "ofdm", "csi", "prediction",
              "transformer", "dask", "benchmark", "numpy"],
    packages=setuptools.find_packages(exclude=['tests']),
    package_data={'csicast': ['config/*.ini', 'config/presets/*.ini']},
    classifiers=[
        'Development Status :: 3 - Alpha',
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
    install_requires=['numpy', 'scipy', 'pandas>=1.5', 'xarray', 'dask[complete]',
                      'torch>=1.13', 'matplotlib'],
    extras_require={'test': ['pytest']},
    entry_points={
        'console_scripts': ['csicast=csicast.runtime.CSI_main:main'],
    },
)
