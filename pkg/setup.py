#
# Copyright (C) 2026 The pbsdup Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Setup module for pbsdup."""
import os
import setuptools  # type: ignore


THIS_DIR = os.path.dirname(os.path.realpath(__file__))


with open(os.path.join(THIS_DIR, "README.md")) as readme_file:
    LONG_DESCRIPTION = readme_file.read()


setuptools.setup(
    name="pbsdup",
    version="0.1.0",
    description="Privacy-preserving duplicate text detection.",
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(include=["pbsdup", "pbsdup.*"]),
    package_data={"pbsdup": ["data/*.tsv", "templates/*.j2"]},
    python_requires=">=3.10",
    install_requires=[
        "numpy",
        "flask",
        "jinja2",
        "requests",
        "scikit-learn",
    ],
    entry_points={
        "console_scripts": [
            "pbsdup = pbsdup.cli:main",
        ],
    },
)
