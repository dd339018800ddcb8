#!/usr/bin/env python3
# Copyright 2026 The LCA Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Prints E[log cosh(n)] for n ~ N(0, 1) (kLogCoshGaussianMean)."""

import mpmath

mpmath.mp.dps = 40


def log_cosh(x):
    # log cosh x = |x| + log1p(exp(-2|x|)) - log 2
    a = abs(x)
    return a + mpmath.log1p(mpmath.exp(-2 * a)) - mpmath.log(2)


def main():
    value = mpmath.quad(lambda x: log_cosh(x) * mpmath.npdf(x), [-mpmath.inf, 0, mpmath.inf])
    print(mpmath.nstr(value, 20))
    print(repr(float(value)))


if __name__ == "__main__":
    main()
