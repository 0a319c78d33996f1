# SPDX-License-Identifier: GPL-3.0-or-later
from setuptools import find_namespace_packages, setup


def get_description():
    return "Entropy-guided pruning of reasoning steps in chain-of-thought traces"


def get_long_description():
    with open("README.md") as f:
        text = f.read()

    # Long description is everything after README's initial heading
    idx = text.find("\n\n")
    return text[idx:]


def get_requirements():
    with open("requirements.txt") as f:
        return f.read().splitlines()


TASKS = "cottools._stepentropy.tasks"

setup(
    name="cottools-stepentropy",
    version="0.1.0",
    packages=find_namespace_packages(where="src"),
    package_dir={"": "src"},
    license="GPLv3+",
    description=get_description(),
    long_description=get_long_description(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)",
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Programming Language :: Python :: 3.13',
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    python_requires=">=3.9",
    install_requires=get_requirements(),
    entry_points={
        "console_scripts": [
            "cottools-stepentropy = cottools._stepentropy.cli:entry_point",
            f"cottools-stepentropy-collect = {TASKS}.collect:entry_point",
            f"cottools-stepentropy-inspect = {TASKS}.inspect:entry_point",
            f"cottools-stepentropy-prune = {TASKS}.prune:entry_point",
            f"cottools-stepentropy-reward = {TASKS}.reward:entry_point",
            f"cottools-stepentropy-sweep = {TASKS}.sweep:entry_point",
            f"cottools-stepentropy-token-baseline = {TASKS}.token_baseline:entry_point",
            f"cottools-stepentropy-build-dataset = {TASKS}.build_dataset:entry_point",
            f"cottools-stepentropy-mi-oracle = {TASKS}.mi_oracle:entry_point",
            f"cottools-stepentropy-report = {TASKS}.report:entry_point",
        ]
    },
    zip_safe=False,
)
