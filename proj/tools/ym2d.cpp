#include <cstdio>
int main(){ std::puts("ym2d 0.1.0"); return 0; }
