#pragma once

long parallel_sum(const int* v, int n);
