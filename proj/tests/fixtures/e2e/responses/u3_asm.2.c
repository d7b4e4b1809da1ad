int main(void) {
  __asm__("still_not_an_instruction");
  return 0;
}
