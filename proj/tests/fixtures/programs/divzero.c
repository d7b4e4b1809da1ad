#include <stdio.h>
int main(void) {
  volatile int zero = 0;
  int r = 10;
  r = r / zero;
  printf("%d\n", r);
  return 0;
}
