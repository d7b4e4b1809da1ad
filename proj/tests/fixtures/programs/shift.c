#include <stdio.h>
int main(void) {
  volatile int amount = 40;
  int r = 1 << amount;
  printf("%d\n", r);
  return 0;
}
